import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def smooth_field(rng, shape, width=4.0, amplitude=1.0):
    """Random field low-pass filtered by a Gaussian of ``width`` pixels."""
    noise = rng.standard_normal(shape)
    ky = np.fft.fftfreq(shape[0])[:, None]
    kx = np.fft.fftfreq(shape[1])[None, :]
    g = np.exp(-2 * (np.pi * width) ** 2 * (kx**2 + ky**2))
    out = np.fft.ifft2(np.fft.fft2(noise) * g).real
    return amplitude * out / np.abs(out).max()


ACCEPTANCE = []


def record(number, ok, detail):
    """Store one acceptance line; printed in the terminal summary."""
    ACCEPTANCE.append(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
