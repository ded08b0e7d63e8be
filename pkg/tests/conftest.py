import os
import sys
import random

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)
os.environ.setdefault('WEBRANK_CONFIG', 'config.config.TestingConfig')

from main import app as flask_app
from models.webmodel import load_web
from models.relations import load_relation
from controllers.helpers import RunConfig

CORPUS = flask_app.config['CORPUS_DIRECTORY']


def corpus_path(name):
    return os.path.join(CORPUS, name if name.endswith('.json') else name + '.json')


def corpus_web(name):
    return load_web(corpus_path(name))


def corpus_relation(name, web):
    return load_relation(corpus_path(name), web)


@pytest.fixture
def app():
    return flask_app


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture
def config(app):
    return RunConfig.from_app_config(app.config)


@pytest.fixture
def rng():
    return random.Random(0)


@pytest.fixture
def web_named():
    return corpus_web


@pytest.fixture
def relation_named():
    return corpus_relation
