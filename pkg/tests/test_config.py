"""
設定読み込みのテスト
"""
import shutil
from pathlib import Path

import pytest

from pkgnet.config import ENSEMBLE_DEFAULTS, ReleaseInput, RunConfig, load_run_config
from pkgnet.exceptions import ConfigError


def write_toml(tmp_path, text):
    path = tmp_path / "run.toml"
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadRunConfig:
    def test_defaults(self):
        config = load_run_config()
        assert config.seed is None
        assert config.modularity_randomizations == ENSEMBLE_DEFAULTS["modularity_randomizations"]
        assert config.inputs == []

    def test_sample_file(self, data_dir):
        config = load_run_config(data_dir / "run.toml")
        assert config.seed == 20060101
        assert config.x_axis == "date"
        assert [entry.label for entry in config.inputs] == ["r1", "r2", "r3", "r4"]
        # 相対パスは設定ファイルの位置が基準
        assert Path(config.inputs[0].path) == data_dir / "releases" / "r1.edges"
        assert all(Path(entry.path).exists() for entry in config.inputs)

    def test_overrides(self, data_dir):
        config = load_run_config(data_dir / "run.toml", {"seed": 7, "louvain_restarts": None, "jobs": 2})
        assert config.seed == 7
        assert config.louvain_restarts == 10
        assert config.jobs == 2

    def test_inputs_override(self, data_dir):
        inputs = [ReleaseInput(path="a.edges", format="edges")]
        config = load_run_config(data_dir / "run.toml", {"inputs": inputs})
        assert config.inputs == inputs
        assert config.inputs[0].label == "a.edges"

    def test_unknown_key(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(write_toml(tmp_path, "[run]\nseeds = 1\n"))

    def test_unknown_table(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(write_toml(tmp_path, "[network]\nseed = 1\n"))

    def test_unknown_override(self):
        with pytest.raises(ConfigError):
            load_run_config(overrides={"colour": "red"})

    def test_syntax_error(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(write_toml(tmp_path, "[run\nseed = 1\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(tmp_path / "missing.toml")

    def test_release_without_path(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(write_toml(tmp_path, "[[release]]\nlabel = \"r1\"\n"))

    def test_release_unknown_field(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(write_toml(tmp_path, "[[release]]\npath = \"r1\"\ncodename = \"woody\"\n"))

    def test_release_bad_format(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(write_toml(tmp_path, "[[release]]\npath = \"r1\"\nformat = \"xml\"\n"))


class TestValidation:
    @pytest.mark.parametrize(
        "values",
        [
            {"modularity_randomizations": 0},
            {"install_replicates": -5},
            {"jobs": 0},
            {"bin_base": 1.0},
            {"major_module_threshold": 1.0},
            {"conflict_mode": "mutual"},
            {"x_axis": "week"},
            {"alternatives": "newest"},
            {"virtuals": "random"},
        ],
    )
    def test_invalid(self, values):
        with pytest.raises(ConfigError):
            RunConfig(**values)

    def test_policy(self):
        policy = RunConfig(alternatives="all_alternatives", include_pre_depends=False).policy()
        assert policy.alternatives == "all_alternatives"
        assert policy.include_pre_depends is False


class TestSeedAndDigest:
    def test_stochastic_commands_need_seed(self):
        config = RunConfig()
        for command in ("community", "nullmodel", "simulate", "evolve"):
            with pytest.raises(ConfigError):
                config.require_seed(command)

    def test_deterministic_commands_do_not(self):
        assert RunConfig().require_seed("stats") is None
        assert RunConfig(seed=3).require_seed("simulate") == 3

    def test_digest_stable(self):
        assert RunConfig(seed=1).digest() == RunConfig(seed=1).digest()
        assert len(RunConfig().digest()) == 64

    def test_digest_ignores_jobs_and_output(self):
        assert RunConfig(seed=1, jobs=1).digest() == RunConfig(seed=1, jobs=4, output_dir="elsewhere").digest()

    def test_digest_tracks_parameters(self):
        assert RunConfig(seed=1).digest() != RunConfig(seed=2).digest()
        assert RunConfig(seed=1).digest() != RunConfig(seed=1, louvain_restarts=3).digest()

    def test_digest_independent_of_location(self, data_dir, tmp_path, monkeypatch):
        from_root = load_run_config(data_dir / "run.toml").digest()
        monkeypatch.chdir(data_dir)
        assert load_run_config("run.toml").digest() == from_root
        # 同じ内容を別の場所に置いても同じダイジェスト
        shutil.copy(data_dir / "run.toml", tmp_path / "run.toml")
        shutil.copytree(data_dir / "releases", tmp_path / "releases")
        assert load_run_config(tmp_path / "run.toml").digest() == from_root

    def test_digest_tracks_input_content(self, tmp_path):
        release = tmp_path / "r1.edges"
        release.write_text("DEP a b\n", encoding="utf-8")
        before = RunConfig(inputs=[ReleaseInput(path=str(release), format="edges")]).digest()
        release.write_text("DEP a b\nDEP b c\n", encoding="utf-8")
        after = RunConfig(inputs=[ReleaseInput(path=str(release), format="edges")]).digest()
        assert before != after
