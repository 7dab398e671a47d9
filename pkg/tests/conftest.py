import sys
from pathlib import Path

# make tests/oracles.py and tests/fixtures_meshes.py importable
sys.path.insert(0, str(Path(__file__).parent))
