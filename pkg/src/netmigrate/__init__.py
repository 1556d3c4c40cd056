from .instance import Instance, load_instance, save_instance  # noqa: F401

__version__ = "0.1.0"
