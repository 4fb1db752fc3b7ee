"""Point cloud dumps.

Both formats open with the same ASCII header block recording the scene
identity, the stream that produced the cloud and the configuration hash::

    #lidarlab-cloud text 1
    #scene_id = demo
    #seed = 42
    #stream = cell/az0001
    #config_hash = 5f1c...
    #revolution = 0
    #points = 1234
    #columns = x y z range intensity channel azimuth
    #end

The text body is one row per point in column order. The binary body is a
packed little-endian record per point: x, y, z, range as 32-bit floats,
intensity and channel as 16-bit unsigned integers, azimuth as a 32-bit
float. Text dumps round trip exactly; binary dumps carry 32-bit precision.
"""
from __future__ import annotations

import struct

from .streams import RandomStream
from .types import LidarPoint, PointCloud

MAGIC = "#lidarlab-cloud"
COLUMNS = "x y z range intensity channel azimuth"
RECORD = struct.Struct("<ffffHHf")


def _header_lines(cloud: PointCloud, fmt: str, config_hash: str,
                  stream: RandomStream | None) -> list[str]:
    seed = stream.seed if stream is not None else 0
    label = stream.label if stream is not None else ""
    return [
        f"{MAGIC} {fmt} 1",
        f"#scene_id = {cloud.scene_id}",
        f"#seed = {seed}",
        f"#stream = {label}",
        f"#config_hash = {config_hash}",
        f"#revolution = {cloud.revolution_index}",
        f"#points = {len(cloud.points)}",
        f"#columns = {COLUMNS}",
        "#end",
    ]


def write_cloud(cloud: PointCloud, path: str, fmt: str = "text",
                config_hash: str = "", stream: RandomStream | None = None) -> None:
    """Dump a cloud to path in 'text' or 'binary' format."""
    if fmt not in ("text", "binary"):
        raise ValueError(f"unknown cloud format '{fmt}'")
    header = "\n".join(_header_lines(cloud, fmt, config_hash, stream)) + "\n"
    if fmt == "text":
        rows = [
            f"{p.x!r} {p.y!r} {p.z!r} {p.range!r} {p.intensity} "
            f"{p.channel} {p.azimuth!r}"
            for p in cloud.points
        ]
        body = "\n".join(rows) + ("\n" if rows else "")
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(header)
            handle.write(body)
        return
    with open(path, "wb") as handle:
        handle.write(header.encode("ascii"))
        for p in cloud.points:
            handle.write(RECORD.pack(p.x, p.y, p.z, p.range,
                                     p.intensity, p.channel, p.azimuth))


def read_cloud(path: str) -> tuple[PointCloud, dict[str, str]]:
    """Load a dump written by write_cloud. Returns (cloud, header fields)."""
    with open(path, "rb") as handle:
        data = handle.read()
    magic_end = data.find(b"\n")
    magic = data[:magic_end].decode("ascii", errors="replace")
    if not magic.startswith(MAGIC):
        raise ValueError(f"{path}: not a cloud dump")
    parts = magic.split()
    fmt = parts[1] if len(parts) > 1 else "text"

    marker = b"#end\n"
    end = data.find(marker)
    if end < 0:
        raise ValueError(f"{path}: missing #end header terminator")
    header: dict[str, str] = {}
    for line in data[:end].decode("ascii").splitlines()[1:]:
        key, _, value = line.lstrip("#").partition("=")
        header[key.strip()] = value.strip()
    body = data[end + len(marker):]

    cloud = PointCloud(points=[],
                       revolution_index=int(header.get("revolution", "0")),
                       scene_id=header.get("scene_id", "scene"))
    if fmt == "text":
        for row in body.decode("utf-8").splitlines():
            x, y, z, rng, inten, chan, az = row.split()
            cloud.points.append(LidarPoint(
                float(x), float(y), float(z), int(inten), int(chan),
                float(az), float(rng)))
    elif fmt == "binary":
        for x, y, z, rng, inten, chan, az in RECORD.iter_unpack(body):
            cloud.points.append(LidarPoint(x, y, z, inten, chan, az, rng))
    else:
        raise ValueError(f"{path}: unknown cloud format '{fmt}'")
    declared = int(header.get("points", len(cloud.points)))
    if declared != len(cloud.points):
        raise ValueError(
            f"{path}: header declares {declared} points, body has "
            f"{len(cloud.points)}")
    return cloud, header
