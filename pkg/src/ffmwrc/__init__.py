"""Functional-decode-forward coding for multi-way relay channels over finite fields."""
