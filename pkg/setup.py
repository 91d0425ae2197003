import os
from setuptools import setup
from setuptools import find_packages

VERSION = '0.1.0'
classifiers = [
    'Development Status :: 3 - Alpha',

    'Intended Audience :: Science/Research',
    'Topic :: Scientific/Engineering :: Physics',
    'Topic :: Scientific/Engineering :: Mathematics',

    'License :: OSI Approved :: BSD License',

    'Programming Language :: Python :: 3 :: Only',
    'Programming Language :: Python :: Implementation :: CPython'
]

keywords = 'dispersive-waves serre-green-naghdi summation-by-parts relaxation-runge-kutta'

BASEDIR = os.path.dirname(os.path.abspath(__file__))
REQS = ['numpy>=1.20.0',
        'scipy>=1.6.0',
        'tqdm>4.11.2',
        'tomli>=1.1.0; python_version < "3.11"',
        'tomli-w>=1.0.0']

config = {
    'description':
    'sgnpy: energy-conserving summation-by-parts solvers for the Serre-Green-Naghdi equations in 1D.',
    'version': VERSION,
    'install_requires': REQS,
    'extras_require': {'test': ['pytest>=6.0']},
    'python_requires': '>=3.7',
    'packages': find_packages(exclude=['tests']),
    'license': 'BSD',
    'scripts': [
        os.path.join('apps', 'sgnrun'),
    ],
    'name': 'sgnpy',
    'include_package_data': True,
    'keywords': keywords,
    'classifiers': classifiers,
}

setup(**config)
