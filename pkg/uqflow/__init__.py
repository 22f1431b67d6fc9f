# uqflow Django project
# Main project configuration package

import pymysql
pymysql.install_as_MySQLdb()
