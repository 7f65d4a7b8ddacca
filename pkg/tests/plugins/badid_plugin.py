"""Test plugin: responds with an id that was never requested."""
import json
import sys

for line in sys.stdin:
    json.loads(line)
    sys.stdout.write(json.dumps({"id": "not-a-real-id", "summary": "x"}) + "\n")
    sys.stdout.flush()
