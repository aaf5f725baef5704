# Copyright (C) 2026  The aanse developers
from setuptools import setup


with open("README.rst", "r") as fh:
    long_desc = fh.read()

with open('aanse/version.py') as fv:
    exec(fv.read())

setup(
    name='aanse',

    version=__version__,

    description='aanse: Anderson-Accelerated Newton Solvers for Steady '
                'Navier-Stokes in Python',
    long_description=long_desc,
    long_description_content_type="text/x-rst",

    author='The aanse developers',

    license='GPLv3',

    classifiers=[
        'Development Status :: 3 - Alpha',

        'Natural Language :: English',

        'Intended Audience :: Science/Research',
        'Intended Audience :: Developers',
        'Topic :: Scientific/Engineering :: Mathematics',
        'Topic :: Scientific/Engineering :: Physics',

        'Operating System :: MacOS',
        'Operating System :: Microsoft :: Windows',
        'Operating System :: POSIX :: Linux',

        'License :: OSI Approved :: GNU General Public License v3 (GPLv3)',

        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: Implementation :: CPython'
    ],

    packages=['aanse'],

    python_requires='>=3.8',

    install_requires=[
        'numpy',
        'scipy',
        'pandas'
    ],

    entry_points={
        'console_scripts': ['aanse=aanse.cli:main']
    }
)
