"""Error-correction compiler and noise-aware simulators for small quantum circuits."""
