__version__ = "0.3.0"

ENGINE_VERSION = f"trialsim {__version__}"
