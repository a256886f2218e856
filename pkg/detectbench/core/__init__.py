"""Toy ISA, assembler and cycle-stepped core."""
