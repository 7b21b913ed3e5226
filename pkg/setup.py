#!/usr/bin/env python
import os
from setuptools import setup

here = os.path.abspath(os.path.dirname(__file__))


def read_requirements(filename='requirements.txt'):
    with open(os.path.join(here, filename)) as fp:
        return [row.strip() for row in fp if row.strip() and not row.startswith('#')]


about = {}
with open(os.path.join(here, 'cohort_kit', '__init__.py'), 'r') as f:
    exec(f.read(), about)


setup(name='cohort_kit',
      version=about['VERSION'],
      description='Cohort divergence analysis of timestamped event streams',
      license='BSD',
      python_requires='>=3.7',
      packages=['cohort_kit', 'cohort_kit.commands'],
      entry_points='''
      [console_scripts]
      cohort_kit=cohort_kit.__main__:main
      ''',
      install_requires=read_requirements(),
      extras_require={'test': read_requirements('requirements-dev.txt')},
)
