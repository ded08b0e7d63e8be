'''
Main flask application. It carries the configuration and the logging setup;
the analyses themselves are run as commands through your manage.py file.
'''

# System imports
import os
import sys
import logging

# Flask imports
from flask import Flask

# Initially build the flask appliation
app = Flask(__name__)

# Load in your application configuration, ProductionConfig unless the
# environment names another class (tests use config.config.TestingConfig)
app.config.from_object(os.environ.get('WEBRANK_CONFIG', 'config.config.ProductionConfig'))

# Log any information from the application to the console. Reports are
# written to stdout, so the log goes to stderr.
LOGGING_LEVEL = getattr(logging, str(app.config['LOGGING_LEVEL']).upper(), logging.INFO)
root = logging.getLogger('SystemLogger')
root.setLevel(LOGGING_LEVEL)
if not root.handlers:
    channel = logging.StreamHandler(sys.stderr)
    channel.setLevel(LOGGING_LEVEL)
    formatter = logging.Formatter('%(name)s[%(levelname)s] - %(message)s')
    channel.setFormatter(formatter)
    root.addHandler(channel)

# Assign the VERSION to this application.
VERSION = app.config['VERSION']

# Your commands
import scripts.web_commands
