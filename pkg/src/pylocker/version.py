VERSION = "0.1.0"
PROJECT_NAME = "pylocker"
PROJECT_NAME_TEXT = "PyLocker"
AUTHOR = "Matthew Johnson"
AUTHOR_EMAIL = "greenchicken1902@gmail.com"
DESCRIPTION = "PyLocker: Locally sparse varying coefficient estimation for asynchronous longitudinal data"
URL = "https://github.com/GreenMachine582/" + PROJECT_NAME
