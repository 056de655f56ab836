"""Shared fixtures: small deterministic scenes and row problems.

Unit tests pin their own explicit configurations so the shipped defaults
can evolve without rewriting expected values. The acceptance suite in
test_acceptance.py is the only place tied to the shipped defaults.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from vbsar.config import default_config
from vbsar.forward import (ImagingGeometry, add_noise, simulate_image,
                           synthesize_scene)

SMALL_N = 32
SMALL_DOMAIN = 320.0


def small_config(**run_overrides):
    cfg = default_config()
    cfg = replace(cfg, geometry=replace(cfg.geometry, grid_n=SMALL_N,
                                        domain=SMALL_DOMAIN))
    if run_overrides:
        cfg = replace(cfg, run=replace(cfg.run, **run_overrides))
    return cfg


@pytest.fixture(scope="session")
def small_cfg():
    return small_config()


@pytest.fixture(scope="session")
def small_scene(small_cfg):
    return synthesize_scene(small_cfg)


@pytest.fixture(scope="session")
def small_geom(small_cfg):
    return ImagingGeometry.from_config(small_cfg)


@pytest.fixture(scope="session")
def small_images(small_cfg, small_scene):
    clean = simulate_image(small_scene, small_cfg)
    noisy = add_noise(clean, small_cfg.noise.snr_db, small_cfg.run.seed)
    return clean, noisy


@pytest.fixture(scope="session")
def row_problem(small_cfg, small_scene, small_geom, small_images):
    """One representative noisy row problem on the small scene."""
    from vbsar.forward import RowOperator
    row = 11
    op = RowOperator(small_scene.y, small_scene.a_r[row],
                     small_scene.sigma0[row], small_geom)
    _, noisy = small_images
    return {
        "row": row,
        "op": op,
        "data": noisy[row],
        "u_true": small_scene.u_r[row],
        "scene": small_scene,
        "cfg": small_cfg,
        "geom": small_geom,
    }


def fresh_operator(problem):
    """New RowOperator so evaluation counters start at zero."""
    from vbsar.forward import RowOperator
    scene = problem["scene"]
    row = problem["row"]
    return RowOperator(scene.y, scene.a_r[row], scene.sigma0[row],
                       problem["geom"])
