"""
python -m hyperpoly
"""
from hyperpoly.main import entrypoint

entrypoint()
