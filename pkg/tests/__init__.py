"""Test suite for LLM WASM Sandbox."""
