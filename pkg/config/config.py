"""
Flask Configuration File
"""
import os
import logging
import yaml
from pathlib import Path

FILE_PATH = Path(__file__)
PARENT_PATH = FILE_PATH.resolve().parent
CONFIG_DIRECTORY = str(PARENT_PATH.resolve())
SETTINGS_FILE_PATH = os.environ.get('WEBRANK_SETTINGS', str(PARENT_PATH / 'settings.yaml'))
try:
    with open(SETTINGS_FILE_PATH, 'r') as settings_file:
        settings = yaml.safe_load(settings_file) or {}
except IOError:
    # Defaults below apply; 'config/example-settings.yaml' lists every key.
    logging.getLogger('SystemLogger.config').debug('No settings file at %s', SETTINGS_FILE_PATH)
    settings = {}


class Config(object):
    VERSION = '0.1.0'
    DEBUG = False
    TESTING = False
    CORPUS_DIRECTORY = settings.get('CORPUS_DIRECTORY', str(PARENT_PATH.parent / 'corpus'))
    LOGGING_LEVEL = settings.get('LOGGING_LEVEL', 'INFO')

    # Numeric evaluation: digits of mpmath precision and the relative pivot
    # threshold used by big-float rank computations
    PRECISION = settings.get('PRECISION', 50)
    TOLERANCE = settings.get('TOLERANCE', '1e-20')

    # Sample points: center + SAMPLE_RADIUS * a/b with |a| <= b <= SAMPLE_BOUND
    POINTS = settings.get('POINTS', 3)
    SEED = settings.get('SEED', 0)
    SAMPLE_BOUND = settings.get('SAMPLE_BOUND', 97)
    SAMPLE_RADIUS = settings.get('SAMPLE_RADIUS', '1/4')
    MAX_RESAMPLES = settings.get('MAX_RESAMPLES', 40)

    # Heuristic zero test for relations with transcendental components
    ZERO_TEST_POINTS = settings.get('ZERO_TEST_POINTS', 5)
    ZERO_THRESHOLD = settings.get('ZERO_THRESHOLD', '1e-30')


class ProductionConfig(Config):
    DEBUG = False


class TestingConfig(Config):
    DEBUG = True
    TESTING = True
    LOGGING_LEVEL = 'WARNING'
    SEED = 0
    POINTS = 3
