"""
WaveSSM configuration variables.
"""
from os import environ, path
from dotenv import load_dotenv

basedir = path.abspath(path.dirname(__file__))
load_dotenv(path.join(basedir, '.env'))

class Config:
    """Set run defaults from .env file."""
    # General Config
    OUTPUT_DIR = environ.get('WAVESSM_OUT', 'out')
    LOG_LEVEL = environ.get('WAVESSM_LOG_LEVEL', 'INFO')

    # Experiments
    SEED = int(environ.get('WAVESSM_SEED', '0'))
    WORKERS = int(environ.get('WAVESSM_WORKERS', '1'))
    MORLET_MODULATION = environ.get('WAVESSM_MORLET_MODULATION', 'angular')
