"""Workbench for homogeneous-functor classification over chain complexes mod p."""
