"""Locally testable chain complexes from square Cayley complexes, with decoders."""
