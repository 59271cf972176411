"""Location-aware messaging over a hierarchical geo-spatial overlay.

Subsystems: :mod:`gloss.geo` (region tree), :mod:`gloss.pipeline` (local
event pipelines), :mod:`gloss.overlay` (hierarchical peer routing),
:mod:`gloss.hearsay`, :mod:`gloss.profiles` (profile caching) and
:mod:`gloss.harness` (scenario replay).
"""

__version__ = "0.1.0"
