"""File formats, image I/O, the captioner subprocess protocol, and the CLI."""
