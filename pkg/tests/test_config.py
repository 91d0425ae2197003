import pytest

from sgnpy.config import (OUTPUT_DIR_ENV, RunConfig, dump_config, dumps_config, from_dict,
                          load_config, loads_config, output_directory, to_dict)
from sgnpy.exceptions import ConfigError


EXAMPLE = '''
seed = 3

[model]
name = "sgn-hyperbolic"
variant = "variable"
lam = 1000.0

[grid]
n = 256
domain = [-10.0, 10.0]

[time]
t_end = 2.5
relax = true
abs_tol = 1e-8
rel_tol = 1e-8

[scenario]
name = "riemann"
h_left = 2.0

[output]
directory = "out"
snapshot_times = [0.5, 1.0]
'''


def test_defaults():
    cfg = RunConfig().validate()
    assert cfg.model.g == pytest.approx(9.81)
    assert cfg.model.lam == pytest.approx(500.)
    assert cfg.time.abs_tol == cfg.time.rel_tol == pytest.approx(1e-5)
    assert cfg.scenario_name == 'soliton' and cfg.scenario_params == {}


def test_parse():
    cfg = loads_config(EXAMPLE).validate()
    assert cfg.model.name == 'sgn-hyperbolic' and cfg.model.lam == 1000.
    assert cfg.grid.domain == [-10., 10.]
    assert cfg.time.relax is True
    assert cfg.scenario_name == 'riemann'
    assert cfg.scenario_params == {'h_left': 2.}
    assert cfg.output.snapshot_times == [0.5, 1.]
    assert cfg.seed == 3


def test_round_trip(tmp_path):
    cfg = loads_config(EXAMPLE)
    assert loads_config(dumps_config(cfg)) == cfg
    path = str(tmp_path / 'run.toml')
    dump_config(cfg, path)
    assert load_config(path) == cfg
    # unset optional values are omitted rather than written as null
    assert 'dt' not in to_dict(cfg)['time']


@pytest.mark.parametrize('changes', [
    {'model': {'name': 'boussinesq'}},
    {'model': {'name': 'swe', 'variant': 'mild'}},
    {'model': {'name': 'sgn-original', 'variant': 'variable'}},
    {'model': {'name': 'swe', 'lam': 100.}},
    {'model': {'name': 'sgn-hyperbolic', 'lam': -1.}},
    {'model': {'name': 'swe', 'frozen': True}},
    {'model': {'operator_mode': 'upwind', 'order': 6}},
    {'model': {'operator_mode': 'sideways'}},
    {'grid': {'n': 2}},
    {'grid': {'domain': [1., -1.]}},
    {'time': {'t_end': 0.}},
    {'time': {'method': 'rk4'}},
    {'time': {'abs_tol': 0.}},
    {'time': {'dt': -0.1}},
    {'viscosity': {'c': -1.}},
    {'scenario': {'name': 'tsunami'}},
], ids=lambda c: '-'.join('{}.{}'.format(s, k) for s, v in c.items() for k in v))
def test_invalid_combinations(changes):
    with pytest.raises(ConfigError):
        from_dict(changes).validate()


def test_unknown_keys():
    with pytest.raises(ConfigError, match='unknown keys'):
        from_dict({'model': {'colour': 'blue'}})
    with pytest.raises(ConfigError, match='unknown sections'):
        from_dict({'plots': {}})


def test_malformed_and_missing_files(tmp_path):
    with pytest.raises(ConfigError):
        loads_config('[model\nname = 1')
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / 'missing.toml'))


def test_output_directory_override(monkeypatch):
    cfg = RunConfig()
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    assert output_directory(cfg) == 'output'
    monkeypatch.setenv(OUTPUT_DIR_ENV, '/tmp/sgn')
    assert output_directory(cfg) == '/tmp/sgn'
