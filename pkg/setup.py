#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Setup script for rrmtools package."""

from setuptools import setup

if __name__ == "__main__":
    setup()
