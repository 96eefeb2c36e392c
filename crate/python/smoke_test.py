"""Smoke test of the `cmvscatter` extension module: scatter, recover, round-trip JSON."""

import json
import math

import cmvscatter as cs


def main() -> None:
    seq = cs.Sequence.perturbed()
    res = cs.direct_scattering(seq, grid=1024)
    assert res.unitarity_defect() < 1e-8, res.unitarity_defect()
    assert res.symmetry_defect() < 1e-8, res.symmetry_defect()

    data = res.data
    again = cs.ScatteringData.from_json(data.to_json())
    assert again.to_json() == data.to_json()
    assert cs.Sequence.from_json(seq.to_json()).to_json() == seq.to_json()

    rec = cs.recover_verblunsky(data, shifts=seq.window_hi + 2)
    err = max(abs(rec[n] - seq[n]) for n in range(len(rec)))
    assert err < 1e-4, err

    step = cs.direct_scattering(cs.Sequence.step(), grid=1024)
    assert len(step.norming) == 1 and len(step.data.masses) == 1

    half, trend_half = cs.power_weight_a2(0.5, levels=6)
    one, trend_one = cs.power_weight_a2(1.0, levels=6)
    assert trend_half == "stable" and trend_one == "divergent", (half, one)

    verdict = json.loads(cs.classify_sequence(cs.Sequence.constant(0.5), grid=256))["verdict"]
    assert verdict == "bounded-GLM-expected", verdict

    assert math.isclose(cs.modified_a2_reflection([0.0j] * 64), 1.0)
    print(f"ok: recovery error {err:.2e}, A2(|x|^1/2) {half[-1]:.3f}, A2(|x|) {one[-1]:.1f}")


if __name__ == "__main__":
    main()
