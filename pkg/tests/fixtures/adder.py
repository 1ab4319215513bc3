"""Reference external model: replies with the sum of the coordinates."""
import sys

header = sys.stdin.readline().split()
if len(header) != 2 or header[0] != "ARITY":
    sys.exit(1)
print("OK", flush=True)
for line in sys.stdin:
    print(repr(sum(float(v) for v in line.split())), flush=True)
