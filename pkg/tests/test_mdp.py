"""MDP model: generators, validation and the YAML file format."""

import numpy as np
import pytest
import yaml

from core.errors import MdpValidationError, ParameterError
from core.mdp import (LEFT, RIGHT, Policy, TabularMdp, chain_mdp, load_mdp, mdp_from_dict, mdp_to_dict, random_mdp,
                      save_mdp, validate)


class TestRandomMdp:

    def test_valid(self, small_random_mdp):
        m = small_random_mdp
        assert validate(m) == []
        assert m.shape == (8, 3)
        assert m.transition.shape == (8, 3, 8)
        np.testing.assert_allclose(m.transition.sum(axis=-1), 1.0, atol=1e-12)
        assert np.all(np.abs(m.reward) <= 1.0)

    def test_branching_limits_successors(self, small_random_mdp):
        assert np.all(np.count_nonzero(small_random_mdp.transition, axis=-1) <= 2)

    def test_same_seed_same_mdp(self):
        a = random_mdp(6, 2, 3, seed=11, gamma=0.8, r_max=2.0)
        b = random_mdp(6, 2, 3, seed=11, gamma=0.8, r_max=2.0)
        np.testing.assert_array_equal(a.transition, b.transition)
        np.testing.assert_array_equal(a.reward, b.reward)

    def test_different_seed_differs(self):
        a = random_mdp(6, 2, 3, seed=1, gamma=0.8, r_max=2.0)
        b = random_mdp(6, 2, 3, seed=2, gamma=0.8, r_max=2.0)
        assert not np.array_equal(a.reward, b.reward)

    def test_arrays_are_read_only(self, small_random_mdp):
        with pytest.raises(ValueError):
            small_random_mdp.reward[0, 0] = 5.0

    @pytest.mark.parametrize("kwargs,name", [
        (dict(n_states=0, n_actions=2, branching=1), "n_states"),
        (dict(n_states=4, n_actions=0, branching=1), "n_actions"),
        (dict(n_states=4, n_actions=2, branching=5), "branching"),
    ])
    def test_invalid_sizes(self, kwargs, name):
        with pytest.raises(ParameterError) as err:
            random_mdp(seed=0, gamma=0.9, r_max=1.0, **kwargs)
        assert err.value.name == name

    def test_invalid_gamma(self):
        with pytest.raises(ParameterError) as err:
            random_mdp(4, 2, 2, seed=0, gamma=1.0, r_max=1.0)
        assert err.value.name == "gamma"


class TestChainMdp:

    def test_structure(self, chain3):
        assert validate(chain3) == []
        assert chain3.reward[2, RIGHT] == 1.0
        assert chain3.reward.sum() == 1.0
        assert chain3.transition[0, LEFT, 0] == 1.0
        assert chain3.transition[0, RIGHT, 1] == 1.0
        assert chain3.transition[2, RIGHT, 2] == 1.0
        assert chain3.c == pytest.approx(20.0)
        assert chain3.value_bound == pytest.approx(10.0)

    def test_slip(self):
        m = chain_mdp(4, 0.25, 0.9)
        assert validate(m) == []
        assert m.transition[1, RIGHT, 2] == pytest.approx(0.75)
        assert m.transition[1, RIGHT, 0] == pytest.approx(0.25)
        assert m.transition[0, LEFT, 0] == pytest.approx(0.75)

    def test_too_short(self):
        with pytest.raises(ParameterError):
            chain_mdp(1, 0.0, 0.9)


class TestValidate:

    def test_reports_coordinates(self, chain3):
        transition = np.array(chain3.transition)
        transition[1, 0, 0] = 0.5
        reward = np.array(chain3.reward)
        reward[0, 1] = 3.0
        broken = TabularMdp.build(transition, reward, 0.9, 1.0)
        violations = validate(broken)
        assert any(v.startswith("transition[1][0] sums to") for v in violations)
        assert any(v.startswith("reward[0][1]") for v in violations)

    def test_shape_mismatch(self, chain3):
        broken = TabularMdp.build(np.ones((3, 2, 2)) / 2, chain3.reward, 0.9, 1.0)
        assert any("transition shape" in v for v in validate(broken))

    def test_gamma_and_initial_dist(self, chain3):
        broken = TabularMdp.build(chain3.transition, chain3.reward, 1.0, 1.0, [0.5, 0.2, 0.2])
        violations = validate(broken)
        assert any("gamma" in v for v in violations)
        assert any("initial_dist sums" in v for v in violations)


class TestPolicy:

    def test_validity_and_equality(self, chain3):
        p = Policy([1, 1, 1])
        assert p.is_valid_for(chain3)
        assert not Policy([1, 2, 0]).is_valid_for(chain3)
        assert not Policy([1, 1]).is_valid_for(chain3)
        assert p == Policy(np.array([1, 1, 1]))
        assert p != Policy([0, 1, 1])


class TestFileFormat:

    def test_round_trip_is_exact(self, tmp_path, small_random_mdp):
        path = tmp_path / "random.yaml"
        save_mdp(small_random_mdp, path)
        loaded = load_mdp(path)
        np.testing.assert_array_equal(loaded.transition, small_random_mdp.transition)
        np.testing.assert_array_equal(loaded.reward, small_random_mdp.reward)
        np.testing.assert_array_equal(loaded.initial_dist, small_random_mdp.initial_dist)
        assert loaded.gamma == small_random_mdp.gamma

    def test_shipped_chain_file(self, chain_file):
        m = load_mdp(chain_file)
        assert m.shape == (5, 2)
        assert m.gamma == 0.9
        assert m.initial_dist[0] == 1.0

    def test_missing_field(self, chain3):
        data = mdp_to_dict(chain3)
        del data["r_max"]
        with pytest.raises(MdpValidationError) as err:
            mdp_from_dict(data)
        assert err.value.violations == ["missing field 'r_max'"]

    def test_unknown_field(self, chain3):
        data = mdp_to_dict(chain3)
        data["horizon"] = 10
        with pytest.raises(MdpValidationError) as err:
            mdp_from_dict(data)
        assert "unknown field 'horizon'" in err.value.violations

    def test_declared_shape_mismatch(self, chain3):
        data = mdp_to_dict(chain3)
        data["n_states"] = 4
        with pytest.raises(MdpValidationError) as err:
            mdp_from_dict(data)
        assert "declared shape" in err.value.violations[0]

    def test_every_violation_listed(self, tmp_path, chain3):
        data = mdp_to_dict(chain3)
        data["transition"][0][0] = [0.5, 0.0, 0.0]
        data["reward"][2][0] = -4.0
        path = tmp_path / "broken.yaml"
        path.write_text(yaml.safe_dump(data), encoding="utf-8")
        with pytest.raises(MdpValidationError) as err:
            load_mdp(path)
        assert len(err.value.violations) == 2
        assert str(path) in str(err.value)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MdpValidationError) as err:
            load_mdp(tmp_path / "nope.yaml")
        assert err.value.violations == ["file not found"]

    def test_not_a_mapping(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n", encoding="utf-8")
        with pytest.raises(MdpValidationError):
            load_mdp(path)
