"""Trust-based model selection under a reconfiguration budget."""
