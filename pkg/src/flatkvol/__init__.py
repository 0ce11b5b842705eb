"""Translation surfaces, saddle connections, intersections and KVol."""

__version__ = "0.1.0"
