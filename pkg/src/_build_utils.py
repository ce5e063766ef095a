#!/usr/bin/env python
"""
Contains the cafin module building utility tools.

The package metadata is read from its source file so that building does
not require the runtime dependencies to be installed.
"""
import sys
import runpy
import pathlib

__all__ = ['say', 'read_metadata', 'read_long_description', 'NAME', 'SRC_DIR']

ROOT_DIR = pathlib.Path(__file__).parent.parent
NAME = 'cafin'
SRC_DIR = 'src'


# force printing to the terminal even if stdout was redirected
def say(text):
    text += ' '
    sys.stdout.write(text)
    sys.stdout.flush()


def read_metadata(root_dir=ROOT_DIR):
    """
        Dunder fields of the package __metadata__ module, without the
        surrounding underscores.
    """
    namespace = runpy.run_path(str(pathlib.Path(root_dir) / SRC_DIR / NAME / '__metadata__.py'))
    return {key.strip('_'): namespace[key] for key in namespace['__all__']}


def read_long_description(root_dir=ROOT_DIR):
    readme = pathlib.Path(root_dir) / 'README.md'
    return readme.read_text() if readme.exists() else ""
