"""Fixture placement, frame rotations and per-link lengths/angles.

All functions broadcast over numpy arrays so a whole street grid can be
evaluated in one call. Angles are radians here; config degrees are
converted by the callers.

Frames
------
The street origin is the start of the asphalt on the pole side: ``x`` runs
across the lane, ``y`` along it, ``z`` up. A link is evaluated in two local
frames, one centred on the transmitter (``j = -1``, z pointing down at the
street) and one on the detector (``j = +1``, z pointing up). In both the
displacement reads ``(x0, j*y0, H)`` before the tilt rotations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEGENERATE_LENGTH_M = 1e-9

TRANSMITTER = -1
RECEIVER = 1


class DegenerateLink(ValueError):
    """Transmitter and receiver coincide."""


def rotation(axis: str, angle: float) -> np.ndarray:
    """Elementary rotation matrix about ``axis`` ('x', 'y' or 'z')."""
    c, s = np.cos(angle), np.sin(angle)
    if axis == "x":
        return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    if axis == "y":
        return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    if axis == "z":
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    raise ValueError(f"axis must be 'x', 'y' or 'z', got {axis!r}")


def frame_matrix(tilt: float, side_rotation: float, side: int) -> np.ndarray:
    """Composite ``Rz(0) Ry(-tilt) Rx(side * side_rotation)``."""
    return (rotation("z", 0.0) @ rotation("y", -tilt)
            @ rotation("x", side * side_rotation))


def fixture_offsets(rod_length, fixture_side, rod_angle, fixture_rod_angle):
    """Lateral and longitudinal offset of a fixture centre from its pole.

    Returns ``(WD_x, LD_y)``; angles in radians.
    """
    half = fixture_side / 2.0
    wd_x = half * np.cos(rod_angle - fixture_rod_angle) + rod_length * np.cos(rod_angle)
    ld_y = half * np.sin(rod_angle - fixture_rod_angle) + rod_length * np.sin(rod_angle)
    return wd_x, ld_y


def initial_offset(frame, vehicle_x, vehicle_y, pole_y, i, k,
                   d_rx, d_ry, wd_x, ld_y, height):
    """Displacement of the far end of a link before any tilt.

    ``vehicle_x``/``vehicle_y`` locate the vehicle centre (or a surface
    point), ``d_rx``/``d_ry`` are the offsets of detector ``i`` and
    ``wd_x``/``ld_y`` those of fixture ``k`` on the pole at ``pole_y``.
    ``frame`` is -1 for the transmitter origin and +1 for the detector.
    """
    x0 = vehicle_x - i * d_rx - wd_x
    y0 = frame * ((vehicle_y - pole_y) + i * d_ry - k * ld_y)
    x0, y0 = np.broadcast_arrays(np.asarray(x0, float), np.asarray(y0, float))
    z0 = np.full_like(x0, float(height))
    return np.stack([x0, y0, z0], axis=-1)


def local_frame(v, tilt, side_rotation, side):
    """Rotate displacement ``v`` (``[..., 3]``) into a tilted device frame.

    Closed-form expansion of ``frame_matrix(tilt, side_rotation, side) @ v``.
    """
    v = np.asarray(v, float)
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    ct, st = np.cos(tilt), np.sin(tilt)
    cv, sv = np.cos(side_rotation), np.sin(side_rotation)
    xp = x * ct - y * side * st * sv - z * st * cv
    yp = y * cv - z * side * sv
    zp = x * st + y * side * ct * sv + z * ct * cv
    return np.stack([xp, yp, zp], axis=-1)


@dataclass(frozen=True)
class LinkGeometry:
    length: np.ndarray
    tx_polar: np.ndarray
    rx_polar: np.ndarray
    tx_azimuth: np.ndarray
    rx_azimuth: np.ndarray
    i: int = 1
    k: int = 1


def link_geometry(tx_local, rx_local, i: int = 1, k: int = 1) -> LinkGeometry:
    """Length, polar and azimuth angles of a link seen from both ends.

    ``tx_local`` is the detector position in the transmitter frame and
    ``rx_local`` the transmitter position in the detector frame.
    """
    tx_local = np.asarray(tx_local, float)
    rx_local = np.asarray(rx_local, float)
    length = np.linalg.norm(rx_local, axis=-1)
    if np.any(length < DEGENERATE_LENGTH_M):
        raise DegenerateLink("transmitter and receiver coincide")
    # arccos(z / L) written as atan2 to keep precision near boresight
    tx_polar = np.arctan2(np.hypot(tx_local[..., 0], tx_local[..., 1]), tx_local[..., 2])
    rx_polar = np.arctan2(np.hypot(rx_local[..., 0], rx_local[..., 1]), rx_local[..., 2])
    tx_az = np.arctan2(tx_local[..., 1], tx_local[..., 0])
    rx_az = np.arctan2(rx_local[..., 1], rx_local[..., 0])
    # arctan2 returns -pi for (-0, -x); fold onto (-pi, pi].
    tx_az = np.where(tx_az <= -np.pi, np.pi, tx_az)
    rx_az = np.where(rx_az <= -np.pi, np.pi, rx_az)
    return LinkGeometry(length, tx_polar, rx_polar, tx_az, rx_az, i, k)


SIDES = (-1, 1)


def pole_links(mount, receiver, points_x, points_y, pole_y: float, height: float,
               *, lane_width: float = 0.0, mirrored: bool = False,
               surface: bool = False) -> dict[tuple[int, int], LinkGeometry]:
    """Geometry of every (detector ``i``, fixture ``k``) pair for one pole.

    ``mount``/``receiver`` are the config records (angles in degrees).
    ``points_x``/``points_y`` give vehicle centres, or street-surface points
    when ``surface`` is set; surface points carry a single upward-facing
    detector with no offsets, keyed ``i = +1``.

    Detector side rotations follow ``receiver.outward_rotation``: when set,
    the rotation about the frame x axis uses ``-i`` so that a positive angle
    turns each detector towards its own end of the vehicle.

    A ``mirrored`` pole stands on the opposite kerb (reflected across
    ``x = lane_width``); its transmitter-side angles equal those of an
    unmirrored fixture looking at the reflected detector.
    """
    links = {}
    det_sides = (1,) if surface else SIDES
    for k in SIDES:
        kk = 0 if k == -1 else 1
        wd_x, ld_y = fixture_offsets(
            mount.rod_length_m, mount.fixture_side_m,
            np.radians(mount.rod_angle_deg[kk]),
            np.radians(mount.fixture_rod_angle_deg[kk]))
        for i in det_sides:
            ii = 0 if i == -1 else 1
            if surface:
                d_rx = d_ry = 0.0
                rx_tilt = rx_side = 0.0
                rx_sense = i
            else:
                d_rx = receiver.lateral_offset(i)
                d_ry = receiver.longitudinal_offset(i)
                rx_tilt = np.radians(receiver.tilt_deg)
                rx_side = np.radians(receiver.side_rotation_deg[ii])
                rx_sense = -i if receiver.outward_rotation else i
            v_rx = initial_offset(RECEIVER, points_x, points_y, pole_y, i, k,
                                  d_rx, d_ry, wd_x, ld_y, height)
            if mirrored:
                # fixture stands at x = 2W - WD_x
                v_rx[..., 0] -= 2.0 * (lane_width - wd_x)
            v_tx = v_rx.copy()
            v_tx[..., 1] *= -1.0
            if mirrored:
                v_tx[..., 0] *= -1.0
            tx_local = local_frame(v_tx, np.radians(mount.tilt_deg),
                                   np.radians(mount.side_rotation_deg[kk]), k)
            rx_local = local_frame(v_rx, rx_tilt, rx_side, rx_sense)
            links[(i, k)] = link_geometry(tx_local, rx_local, i, k)
    return links
