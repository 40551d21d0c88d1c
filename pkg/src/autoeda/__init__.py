"""LLM-assisted exploratory data analysis engine.

Builds a layered summary of a relational schema, turns clarified natural
language questions into validated SQL through schema filtering and a
self-refinement chain, and recommends charts for the results. Exposed as a
library, CLI (``autoeda``), and HTTP service.
"""

__version__ = "0.1.0"
