# Documentation package for uqflow project