"""Space-time resonance toolkit for the viscous Klein-Gordon equation."""
