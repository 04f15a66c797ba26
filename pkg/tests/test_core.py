import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from banditlab import (
    Arm,
    BanditInstance,
    BUILTIN_INSTANCES,
    GapVector,
    SeedSpec,
    derive_run_seed,
    gap_vector,
    instance_from_json,
    instance_to_json,
    resolve_instance,
)
from banditlab.core import _GOLDEN, _splitmix64

from _oracles import splitmix64_stream


class TestSeedDerivation:
    def test_splitmix64_matches_reference_stream(self):
        ref = splitmix64_stream(0, 50)
        mine = [_splitmix64((i * _GOLDEN) & ((1 << 64) - 1)) for i in range(50)]
        assert mine == ref

    def test_splitmix64_known_values_seed_zero(self):
        # first three outputs of the splitmix64 stream seeded with 0
        assert _splitmix64(0) == 0xE220A8397B1DCDAF
        assert _splitmix64(_GOLDEN) == 0x6E789E6AA1B965F4
        assert _splitmix64((2 * _GOLDEN) & ((1 << 64) - 1)) == 0x06C45D188009454F

    def test_derive_run_seed_frozen_values(self):
        assert derive_run_seed(SeedSpec(0, 0)) == 7960286522194355700
        assert derive_run_seed(SeedSpec(0, 1)) == 487617019471545679
        assert derive_run_seed(SeedSpec(12345, 0)) == 12929068707531143761
        assert derive_run_seed(SeedSpec(12345, 7)) == 13865618089749497632
        assert derive_run_seed(SeedSpec(2**64 - 1, 3)) == 10318735482467590012

    def test_derive_run_seed_distinct_across_runs(self):
        seen = {derive_run_seed(SeedSpec(42, r)) for r in range(200_000)}
        assert len(seen) == 200_000

    def test_derive_run_seed_distinct_across_masters(self):
        a = [derive_run_seed(SeedSpec(m, 0)) for m in range(1000)]
        assert len(set(a)) == 1000

    def test_seed_spec_validation(self):
        with pytest.raises(ValueError):
            SeedSpec(-1, 0)
        with pytest.raises(ValueError):
            SeedSpec(2**64, 0)
        with pytest.raises(ValueError):
            SeedSpec(0, -1)

    def test_outputs_fit_uint64(self):
        for r in range(100):
            s = derive_run_seed(SeedSpec(999, r))
            assert 0 <= s < 2**64


class TestArmAndInstance:
    def test_arm_rejects_bad_sigma(self):
        with pytest.raises(ValueError):
            Arm(0.0, 0.0)
        with pytest.raises(ValueError):
            Arm(0.0, -1.0)
        with pytest.raises(ValueError):
            Arm(math.nan, 1.0)
        with pytest.raises(ValueError):
            Arm(0.0, math.inf)

    def test_instance_rejects_bad_model(self):
        with pytest.raises(ValueError):
            BanditInstance(model="pareto", arms=(Arm(0.0, 1.0),))

    def test_instance_rejects_empty(self):
        with pytest.raises(ValueError):
            BanditInstance(model="uniform", arms=())

    def test_n_arms(self):
        inst = BUILTIN_INSTANCES["paper-uniform-6arm"]
        assert inst.n_arms == 6

    def test_builtin_names_exist(self):
        assert "paper-uniform-6arm" in BUILTIN_INSTANCES
        assert "paper-gaussian-6arm" in BUILTIN_INSTANCES
        assert BUILTIN_INSTANCES["paper-uniform-6arm"].model == "uniform"
        assert BUILTIN_INSTANCES["paper-gaussian-6arm"].model == "gaussian"

    def test_builtin_uniform_parameters(self):
        inst = BUILTIN_INSTANCES["paper-uniform-6arm"]
        assert [a.mu for a in inst.arms] == [5.5, 5.0, 4.5, 4.0, 4.75, 3.0]
        assert [a.sigma for a in inst.arms] == [4.5, 5.0, 4.5, 4.0, 3.75, 2.0]

    def test_builtin_gaussian_parameters(self):
        inst = BUILTIN_INSTANCES["paper-gaussian-6arm"]
        assert [a.mu for a in inst.arms] == [10.0, 9.0, 8.0, 7.0, -1.0, 0.0]
        assert [a.sigma for a in inst.arms] == [
            2.0 * math.sqrt(2.0),
            1.0,
            1.0,
            math.sqrt(0.5),
            1.0,
            2.0,
        ]


class TestGapVector:
    def test_uniform_6arm_gaps(self):
        gv = gap_vector(BUILTIN_INSTANCES["paper-uniform-6arm"])
        assert gv.best_mean == 5.5
        assert gv.gaps == (0.0, 0.5, 1.0, 1.5, 0.75, 2.5)
        assert gv.optimal == (0,)

    def test_tied_optima(self):
        inst = BanditInstance(
            model="uniform", arms=(Arm(1.0, 1.0), Arm(1.0, 2.0), Arm(0.0, 1.0))
        )
        gv = gap_vector(inst)
        assert gv.optimal == (0, 1)
        assert gv.gaps == (0.0, 0.0, 1.0)

    @given(
        mus=st.lists(
            st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
            min_size=1,
            max_size=12,
        )
    )
    def test_gap_properties(self, mus):
        inst = BanditInstance(model="uniform", arms=tuple(Arm(m, 1.0) for m in mus))
        gv = gap_vector(inst)
        assert isinstance(gv, GapVector)
        assert gv.best_mean == max(mus)
        assert all(g >= 0.0 for g in gv.gaps)
        assert len(gv.optimal) >= 1
        assert all(gv.gaps[i] == 0.0 for i in gv.optimal)


class TestInstanceJson:
    def test_round_trip_builtins(self):
        for name, inst in BUILTIN_INSTANCES.items():
            again = instance_from_json(instance_to_json(inst))
            assert again == inst, name

    def test_canonical_bytes(self):
        inst = BanditInstance(model="uniform", arms=(Arm(1.0, 2.0),))
        expected = (
            '{\n  "arms": [\n    {\n      "mu": 1.0,\n      "sigma": 2.0\n    }\n  ],'
            '\n  "model": "uniform"\n}\n'
        )
        assert instance_to_json(inst) == expected
        assert instance_to_json(inst) == instance_to_json(inst)

    def test_malformed_object_rejected(self):
        with pytest.raises(ValueError):
            BanditInstance.from_json_dict({"model": "uniform"})
        with pytest.raises(ValueError):
            BanditInstance.from_json_dict({"model": "uniform", "arms": [{"mu": 1.0}]})

    def test_resolve_instance_builtin(self):
        assert resolve_instance("paper-uniform-6arm") is BUILTIN_INSTANCES["paper-uniform-6arm"]

    def test_resolve_instance_file(self, tmp_path):
        inst = BanditInstance(model="gaussian", arms=(Arm(0.0, 1.0), Arm(1.0, 0.5)))
        p = tmp_path / "inst.json"
        p.write_text(instance_to_json(inst), encoding="utf-8")
        assert resolve_instance(str(p)) == inst

    def test_resolve_instance_missing_file(self):
        with pytest.raises(OSError):
            resolve_instance("/nonexistent/inst.json")

    def test_resolve_instance_bad_json_content(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"model": "uniform"}), encoding="utf-8")
        with pytest.raises(ValueError):
            resolve_instance(str(p))
