import sys
import time
from pathlib import Path

from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

SESSION_START = time.perf_counter()

# fixed example streams keep the suite's runtime reproducible
settings.register_profile("repo", derandomize=True, print_blob=True)
settings.load_profile("repo")


def pytest_collection_modifyitems(session, config, items):
    # the acceptance run closes with a whole-suite timing check, so it goes last
    items.sort(key=lambda item: item.path.name == "test_acceptance.py")
