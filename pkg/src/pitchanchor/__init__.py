"""Anchoring the orientation of a rigid body to the pitch set on SO(3)."""
