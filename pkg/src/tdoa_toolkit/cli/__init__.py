from tdoa_toolkit.cli.config import RunConfig
from tdoa_toolkit.cli.main import build_parser, main

__all__ = [
    'RunConfig',
    'build_parser',
    'main',
]
