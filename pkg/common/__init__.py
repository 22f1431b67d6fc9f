# Common module for shared utilities and permissions
# This module contains reusable components across all apps 