# This file is part of aanse:
# Anderson-Accelerated Newton Solvers for Steady Navier-Stokes
# Copyright (C) 2026  The aanse developers
#
# aanse is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# aanse is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE. See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with aanse. If not, see <http://www.gnu.org/licenses/>.

import configparser
import os

from .driver import METHODS, SolverConfig
from .mesh import Pattern

#: Version of the manifest layout understood by this package.
SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Raised for an invalid run manifest.

    The *field* attribute names the offending entry as
    ``section.key`` (or the section alone).
    """

    def __init__(self, message, field=None):
        super(ConfigError, self).__init__(message)
        self.field = field


def _boolean(text):
    value = configparser.ConfigParser.BOOLEAN_STATES.get(text.lower())
    if value is None:
        raise ValueError('not a boolean: {!r}'.format(text))
    return value


def _integers(text):
    return tuple(int(v) for v in text.split(',') if v.strip())


def _format(value):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ', '.join(str(v) for v in value)
    return str(value)


#: Manifest layout: section -> key -> (parser, default).
SCHEMA = {
    'manifest': {
        'schema_version': (int, SCHEMA_VERSION),
    },
    'problem': {
        're': (float, None),
        'nu': (float, None),
        'lid_velocity': (float, 1.0),
    },
    'mesh': {
        'n': (int, 16),
        'pattern': (str, Pattern.CROSSED.value),
    },
    'solver': {
        'method': (str, 'newton'),
        'depth': (int, 1),
        'depths': (_integers, ()),
        'tolerance': (float, 1e-12),
        'max_iters': (int, 50),
        'warm_start': (int, 3),
        'blowup_factor': (float, 1e6),
    },
    'output': {
        'out_dir': (str, 'results'),
        'vtk': (_boolean, False),
        'mesh_dump': (_boolean, False),
        'timings': (_boolean, True),
        'seed': (int, 0),
    },
}

_SECTION_OF = dict((key, section) for section, keys in SCHEMA.items()
                   for key in keys)


class RunManifest(object):
    """Validated settings of a command-line run.

    Every key of `SCHEMA` is an attribute; keys not given take their
    default value.

    :Parameters:

        **settings:
            Values of manifest keys, already converted to their type.

    """

    def __init__(self, **settings):
        for key in settings:
            if key not in _SECTION_OF:
                raise ConfigError('unknown setting {!r}'.format(key),
                                  field=key)
        for section, keys in SCHEMA.items():
            for key, (_, default) in keys.items():
                setattr(self, key, settings.get(key, default))
        self.validate()

    def __eq__(self, other):
        return (isinstance(other, RunManifest)
                and self.as_dict() == other.as_dict())

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return 'RunManifest({})'.format(', '.join(
            '{}={!r}'.format(k, v) for k, v in self.as_dict().items()
            if v is not None))

    def as_dict(self):
        return dict((key, getattr(self, key)) for key in _SECTION_OF)

    def _fail(self, key, message):
        raise ConfigError('{}.{}: {}'.format(_SECTION_OF[key], key, message),
                          field='{}.{}'.format(_SECTION_OF[key], key))

    def validate(self):
        if self.schema_version != SCHEMA_VERSION:
            self._fail('schema_version', 'unsupported version {} (expected '
                       '{})'.format(self.schema_version, SCHEMA_VERSION))
        if self.re is not None and self.nu is not None:
            self._fail('nu', 're and nu are mutually exclusive')
        if self.re is None and self.nu is None:
            self._fail('re', 'one of re and nu must be given')
        if self.re is not None and not self.re > 0.0:
            self._fail('re', 'must be positive (got {})'.format(self.re))
        if self.nu is not None and not self.nu > 0.0:
            self._fail('nu', 'must be positive (got {})'.format(self.nu))
        if self.n < 1:
            self._fail('n', 'must be at least 1 (got {})'.format(self.n))
        if self.pattern not in [p.value for p in Pattern]:
            self._fail('pattern', 'unknown pattern {!r}'.format(
                self.pattern))
        if self.method not in METHODS:
            self._fail('method', 'unknown method {!r}'.format(self.method))
        if METHODS[self.method][1] and self.depth < 1:
            self._fail('depth', 'must be at least 1 (got {})'.format(
                self.depth))
        if any(d < 1 for d in self.depths):
            self._fail('depths', 'all depths must be at least 1')
        if not self.tolerance > 0.0:
            self._fail('tolerance', 'must be positive')
        if self.max_iters < 1:
            self._fail('max_iters', 'must be at least 1')
        if self.warm_start < 0:
            self._fail('warm_start', 'must be non-negative')
        if not self.blowup_factor > 1.0:
            self._fail('blowup_factor', 'must be greater than 1')
        if not self.out_dir:
            self._fail('out_dir', 'must not be empty')

    def updated(self, **overrides):
        """Copy of the manifest with the given (non-None) values replaced.

        Giving *re* clears *nu* and conversely.
        """
        settings = self.as_dict()
        overrides = dict((k, v) for k, v in overrides.items()
                         if v is not None)
        if 're' in overrides:
            settings['nu'] = None
        if 'nu' in overrides:
            settings['re'] = None
        settings.update(overrides)
        return RunManifest(**settings)

    def solver_config(self, method=None, depth=None):
        """`SolverConfig` of the run, optionally for another method."""
        return SolverConfig(
            method=method or self.method,
            depth=self.depth if depth is None else depth,
            tolerance=self.tolerance, max_iters=self.max_iters,
            warm_start=self.warm_start, blowup_factor=self.blowup_factor,
            re=self.re, nu=self.nu, n=self.n, pattern=self.pattern,
            lid_velocity=self.lid_velocity, timings=self.timings
        )

    def to_string(self):
        """Print the manifest in the format read by `parse_manifest`."""
        lines = []
        for section, keys in SCHEMA.items():
            lines.append('[{}]'.format(section))
            for key in keys:
                value = getattr(self, key)
                if value is None or value == ():
                    continue
                lines.append('{} = {}'.format(key, _format(value)))
            lines.append('')
        return '\n'.join(lines)

    def prepare_output(self):
        """Create the output directory and check it is writable."""
        try:
            os.makedirs(self.out_dir, exist_ok=True)
        except OSError as err:
            self._fail('out_dir', 'cannot create {!r} ({})'.format(
                self.out_dir, err))
        if not os.access(self.out_dir, os.W_OK):
            self._fail('out_dir', '{!r} is not writable'.format(
                self.out_dir))
        return self.out_dir


def parse_manifest(text):
    """Parse a run manifest.

    :Parameters:

        text: `str`
            The manifest, ``key = value`` entries grouped in sections.

    :Returns:

        `RunManifest`

    **Examples**

    >>> manifest = parse_manifest('[problem]\\nre = 100\\n[mesh]\\nn = 8\\n')
    >>> print(manifest.re, manifest.n, manifest.pattern)
    100.0 8 crossed

    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as err:
        raise ConfigError('malformed manifest: {}'.format(err))

    settings = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError('unknown section [{}]'.format(section),
                              field=section)
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(
                    'unknown key {!r} in section [{}]'.format(key, section),
                    field='{}.{}'.format(section, key)
                )
            convert = SCHEMA[section][key][0]
            try:
                settings[key] = convert(raw.strip())
            except ValueError:
                raise ConfigError(
                    '{}.{}: invalid value {!r}'.format(section, key, raw),
                    field='{}.{}'.format(section, key)
                )
    return RunManifest(**settings)


def read_manifest(path):
    """Parse the run manifest stored in file *path*."""
    with open(path) as f:
        return parse_manifest(f.read())
