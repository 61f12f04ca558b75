"""Quasicrystallic circle patterns and discrete Z^gamma maps."""
