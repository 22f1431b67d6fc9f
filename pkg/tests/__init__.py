# Tests package for EduPulse project 
