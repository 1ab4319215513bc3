"""Answers the handshake and one request, then exits."""
import sys

sys.stdin.readline()
print("OK", flush=True)
sys.stdin.readline()
print("1.0", flush=True)
sys.exit(0)
