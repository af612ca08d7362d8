"""cogest: co-speech gesture command engine for a simulated collaborative workcell."""

__version__ = "0.1.0"
