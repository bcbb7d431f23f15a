"""Dynamic knowledge-graph factuality benchmark harness.

Generates compound questions about randomly sampled KG entities, estimates
their difficulty, verifies long-form model responses through a two-layer
filter pipeline, and reports weighted accuracy plus breadth/depth
hallucination rates.
"""

__version__ = "0.1.0"
