"""Robust rotation search: truncated least-squares, its semidefinite
relaxation, and dual-certificate tightness verification."""

from ._rotsdr import (  # noqa: F401
    RegimeMismatchError,
    build_Q,
    certify,
    decompose_inlier,
    eigengap,
    extract_quaternion,
    generate_instance,
    instance_data_matrices,
    lambda_min2_closed_form,
    q_spectrum_closed_form,
    quat_angle,
    quat_to_rot,
    ratio_experiment,
    rot_to_quat,
    solve_sdr,
    tls_bruteforce,
    tls_by_classification,
    tls_objective,
)

__all__ = [
    "RegimeMismatchError",
    "build_Q",
    "certify",
    "decompose_inlier",
    "eigengap",
    "extract_quaternion",
    "generate_instance",
    "instance_data_matrices",
    "lambda_min2_closed_form",
    "q_spectrum_closed_form",
    "quat_angle",
    "quat_to_rot",
    "ratio_experiment",
    "rot_to_quat",
    "solve_sdr",
    "tls_bruteforce",
    "tls_by_classification",
    "tls_objective",
]
