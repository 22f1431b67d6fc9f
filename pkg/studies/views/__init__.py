# Studies views package for study runs and contours
