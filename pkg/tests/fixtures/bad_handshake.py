import sys

sys.stdin.readline()
print("NOPE", flush=True)
