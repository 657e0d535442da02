"""Minimum-distortion embeddings of graph metrics into weighted subdivisions of a pattern graph."""
