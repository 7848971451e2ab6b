"""Pedicle screw correspondence and 2D/3D registration."""

import json as _json

from ._screwreg import (
    Error,
    RigidPose,
    View,
    dice,
    differential_evolution,
    gcl,
    gradients,
    make_rig,
    project_point,
    rasterize,
    screw_mesh,
    synth,
    triangulate,
)
from . import _screwreg

__all__ = [
    "Error",
    "RigidPose",
    "View",
    "classify",
    "dice",
    "differential_evolution",
    "gcl",
    "gradients",
    "make_rig",
    "project_point",
    "rasterize",
    "register",
    "screw_mesh",
    "synth",
    "triangulate",
    "triangulate_scene",
]


def classify(scene, stage="pre", **options):
    """Scores every combination of a scene directory; returns the report dict."""
    return _json.loads(_screwreg.classify_json(str(scene), stage, _json.dumps(options)))


def register(scene, combination, **options):
    """Registers one combination; returns the report dict."""
    return _json.loads(_screwreg.register_json(str(scene), int(combination), _json.dumps(options)))


def triangulate_scene(scene):
    return _json.loads(_screwreg.triangulate_scene_json(str(scene)))
