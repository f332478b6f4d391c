import numpy as np
import pytest

from kmsa.core import (
    ConfigError,
    GraphRecipe,
    KernelSpec,
    KmsaConfig,
    MultiviewDataset,
    config_from_dict,
    config_to_dict,
    validate_config,
)


def _dataset(m=3, N=20, labels=True, seed=0):
    rng = np.random.default_rng(seed)
    views = tuple(rng.standard_normal((4 + v, N)) for v in range(m))
    y = np.arange(N) % 3 if labels else None
    return MultiviewDataset(views, y)


class TestMultiviewDataset:

    def test_default_names_and_shapes(self):
        data = _dataset(m=2, N=5)
        assert data.view_names == ("view_1", "view_2")
        assert data.n_views == 2
        assert data.n_samples == 5
        assert data.dims == [4, 5]

    def test_subset_keeps_columns_and_labels(self):
        data = _dataset(m=2, N=6)
        sub = data.subset([4, 1])
        np.testing.assert_array_equal(sub.views[0], data.views[0][:, [4, 1]])
        np.testing.assert_array_equal(sub.labels, data.labels[[4, 1]])


class TestValidateConfig:

    def test_valid_config_passes(self):
        validate_config(KmsaConfig(d=5), _dataset(m=3, N=20))

    def test_r_must_exceed_one(self):
        with pytest.raises(ConfigError, match="r must exceed 1") as exc:
            validate_config(KmsaConfig(d=5, r=1.0), _dataset())
        assert exc.value.codes == ["r_not_above_one"]

    def test_eta_must_be_negative(self):
        with pytest.raises(ConfigError, match="eta must be negative") as exc:
            validate_config(KmsaConfig(d=5, eta=1.0), _dataset())
        assert "eta_not_negative" in exc.value.codes

    def test_collects_every_violation(self):
        cfg = KmsaConfig(d=50, r=0.5, kappa=-1.0, tol=0.0)
        with pytest.raises(ConfigError) as exc:
            validate_config(cfg, _dataset(N=20))
        assert set(exc.value.codes) == {"d_exceeds_n", "r_not_above_one", "kappa_negative", "tol_not_positive"}

    def test_lda_requires_labels(self):
        cfg = KmsaConfig(d=2, graph=GraphRecipe(kind="lda"))
        with pytest.raises(ConfigError) as exc:
            validate_config(cfg, _dataset(labels=False))
        assert exc.value.codes == ["lda_requires_labels"]

    def test_lpp_neighbours_below_n(self):
        cfg = KmsaConfig(d=2, graph=GraphRecipe(kind="lpp", k=20))
        with pytest.raises(ConfigError) as exc:
            validate_config(cfg, _dataset(N=20))
        assert exc.value.codes == ["lpp_k_out_of_range"]

    def test_per_view_spec_count(self):
        cfg = KmsaConfig(d=2, kernel=(KernelSpec(), KernelSpec()))
        with pytest.raises(ConfigError) as exc:
            validate_config(cfg, _dataset(m=3))
        assert exc.value.codes == ["kernel_count_mismatch"]

    def test_bad_kernel_parameters(self):
        cfg = KmsaConfig(d=2, kernel=KernelSpec(kind="polynomial", degree=0, offset=-1.0))
        with pytest.raises(ConfigError) as exc:
            validate_config(cfg, _dataset())
        assert set(exc.value.codes) == {"degree_invalid", "offset_negative"}

    def test_max_iters_zero_allowed(self):
        validate_config(KmsaConfig(d=2, max_iters=0), _dataset())

    @pytest.mark.parametrize("field, value", [
        ("r", "3"), ("kappa", None), ("eta", "-1"), ("tol", [1e-6]), ("ridge", True),
    ])
    def test_mistyped_number(self, field, value):
        cfg = config_from_dict({field: value, "d": 2})
        with pytest.raises(ConfigError, match=f"{field} must be a number") as exc:
            validate_config(cfg, _dataset())
        assert exc.value.codes == [f"{field}_invalid"]

    @pytest.mark.parametrize("field, value, code", [
        ("d", "2", "d_not_positive"),
        ("max_iters", 2.5, "max_iters_invalid"),
        ("seed", "0", "seed_invalid"),
        ("center_kernel", "yes", "center_kernel_invalid"),
        ("learn_weights", 1, "learn_weights_invalid"),
    ])
    def test_mistyped_other_fields(self, field, value, code):
        cfg = config_from_dict({"d": 2, field: value})
        with pytest.raises(ConfigError) as exc:
            validate_config(cfg, _dataset())
        assert exc.value.codes == [code]

    def test_mistyped_spec_fields(self):
        cfg = config_from_dict({"d": 2, "kernel": {"kind": "polynomial", "offset": "1"},
                                "graph": {"kind": "lpp", "k": "3", "t": "0.5"}})
        with pytest.raises(ConfigError) as exc:
            validate_config(cfg, _dataset())
        assert set(exc.value.codes) == {"offset_invalid", "lpp_k_out_of_range", "lpp_t_not_positive"}

    def test_too_few_samples(self):
        with pytest.raises(ConfigError) as exc:
            validate_config(KmsaConfig(d=1), _dataset(N=1, labels=False))
        assert "too_few_samples" in exc.value.codes


class TestConfigDict:

    def test_round_trip(self):
        cfg = KmsaConfig(d=3, kernel=(KernelSpec(kind="linear"), KernelSpec(bandwidth=2.0)),
                         graph=GraphRecipe(kind="lpp", k=3, t=0.5))
        assert config_from_dict(config_to_dict(cfg)) == cfg

    def test_single_object_broadcasts(self):
        cfg = config_from_dict({"graph": {"kind": "spp", "lam": 0.5}})
        assert cfg.graph_for(0) == cfg.graph_for(3) == GraphRecipe(kind="spp", lam=0.5)

    def test_omitted_keys_take_base(self):
        base = KmsaConfig(d=7)
        assert config_from_dict({"r": 2.0}, base) == KmsaConfig(d=7, r=2.0)

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as exc:
            config_from_dict({"gamma": 1})
        assert exc.value.codes == ["unknown_key"]

    def test_with_recipe_applies_to_all_views(self):
        cfg = KmsaConfig(graph=(GraphRecipe(), GraphRecipe(k=3))).with_recipe("lpp")
        assert [g.kind for g in cfg.graph] == ["lpp", "lpp"]
        assert cfg.graph[1].k == 3
