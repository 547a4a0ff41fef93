"""Temporal intention of links shared in social posts.

Extracts features for a (post, linked resource) pair, classifies whether the
resource is still relevant to the post, and maps change x relevancy to the
author's intended time: posting time or reading time.
"""

__version__ = "0.1.0"
