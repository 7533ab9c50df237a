import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import CORPUS  # noqa: E402


@pytest.fixture(params=sorted(CORPUS))
def corpus_graph(request):
    return CORPUS[request.param]
