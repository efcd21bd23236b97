"""Tests package."""

from tests.conftest import *
