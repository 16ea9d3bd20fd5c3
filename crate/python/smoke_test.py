#!/usr/bin/env python3
"""Smoke test for the mera_py extension module.

Build the module first, then run this script from the repository root:

    cargo build -p mera-py --release
    python3 python/smoke_test.py
"""

import pathlib
import shutil
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def ensure_module() -> None:
    """Copy the built cdylib next to this script under an importable name."""
    here = pathlib.Path(__file__).resolve().parent
    target = here / "mera_py.so"
    candidates = [
        ROOT / "target" / "release" / "libmera_py.so",
        ROOT / "target" / "debug" / "libmera_py.so",
    ]
    built = [c for c in candidates if c.exists()]
    if not built:
        sys.exit("build the extension first: cargo build -p mera-py --release")
    newest = max(built, key=lambda p: p.stat().st_mtime)
    if not target.exists() or target.stat().st_mtime < newest.stat().st_mtime:
        shutil.copy2(newest, target)
    sys.path.insert(0, str(here))


def main() -> None:
    ensure_module()
    import mera_py

    device = mera_py.Device.preset("eagle127", profile="eagle", seed=3)
    assert device.num_qubits == 127
    assert len(device.edges()) == 144

    circuit = mera_py.Circuit.benchmark("rus:4")
    assert circuit.num_qubits == 4
    assert circuit.critical_path() == 28
    assert max(circuit.mcm_intensity()) == 6

    # QASM round trip.
    again = mera_py.Circuit.from_qasm(circuit.to_qasm())
    assert again.critical_path() == circuit.critical_path()

    result = mera_py.compile(circuit, device, layout="mera", routing="mera", dd="cadd")
    assert result.swap_count == 0, result.swap_count
    assert result.critical_path == 28

    counts = result.simulate(shots=512, seed=7)
    assert sum(counts.values()) == 512
    fidelity = mera_py.fidelity_to_ideal(counts, circuit)
    assert 0.0 < fidelity <= 1.0

    worst = mera_py.compile(circuit, device, layout="worst", routing="distance-only", dd="none")
    worst_counts = worst.simulate(shots=512, seed=7)
    worst_fidelity = mera_py.fidelity_to_ideal(worst_counts, circuit)
    assert worst_fidelity < fidelity, (worst_fidelity, fidelity)

    estimates = mera_py.profile(device, shots=256, seed=1)
    assert len(estimates) == 127
    assert all(0.0 <= e <= 1.0 for _, e in estimates)

    h = mera_py.hellinger_fidelity({"0": 0.5, "1": 0.5}, {"0": 1.0})
    assert abs(h - 0.5) < 1e-12

    print("smoke test passed:")
    print(f"  mera    fidelity {fidelity:.4f}  (swaps={result.swap_count}, path={result.critical_path})")
    print(f"  worst   fidelity {worst_fidelity:.4f}  (swaps={worst.swap_count}, path={worst.critical_path})")


if __name__ == "__main__":
    main()
