import pytest

from handlers.config_handler import ConfigError, ConfigHandler


def test_defaults():
    config = ConfigHandler().solver_config
    assert config.strategy == "auto"
    assert config.timeout_ms == 60_000
    assert config.int_bound == 32
    assert not config.accept_bounded


def test_file_values_and_overrides(tmp_path):
    ini = tmp_path / "solver.ini"
    ini.write_text("[solver]\nstrategy = fast\nmax_size = 7\n\n"
                   "[verification]\naccept_bounded = true\n\n[cegqi]\nmax_iterations = 5\n")
    handler = ConfigHandler(str(ini), {"max_size": 9, "seed": None})
    config = handler.solver_config
    assert config.strategy == "fast"
    assert config.max_size == 9
    assert config.seed == 0
    assert config.accept_bounded
    assert config.max_cegqi_iterations == 5


def test_reload_reads_the_file_again(tmp_path):
    ini = tmp_path / "solver.ini"
    ini.write_text("[solver]\ntimeout_ms = 1000\n")
    handler = ConfigHandler(str(ini))
    ini.write_text("[solver]\ntimeout_ms = 2000\n")
    handler.reload()
    assert handler.solver_config.timeout_ms == 2000


@pytest.mark.parametrize("text", [
    "[solver]\nstrategy = fastest\n",
    "[solver]\ntimeout_ms = 0\n",
    "[solver]\nmax_size = twelve\n",
    "strategy = fast\n",
])
def test_invalid_files(tmp_path, text):
    ini = tmp_path / "solver.ini"
    ini.write_text(text)
    with pytest.raises(ConfigError):
        ConfigHandler(str(ini))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        ConfigHandler(str(tmp_path / "absent.ini"))


def test_unknown_override():
    with pytest.raises(ConfigError):
        ConfigHandler(overrides={"turbo": True})
