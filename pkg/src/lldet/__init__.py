"""Low-light object detection toolkit.

Three pieces tied together by a CLI:

* image enhancement (luma histogram equalization and a toy-scale
  dark-to-bright translation GAN),
* a small float64 tensor engine with reverse-mode differentiation that
  backs the GAN,
* a detector-agnostic bounding-box evaluation protocol (IoU matching,
  per-class AP, mAP).
"""

__version__ = "0.1.0"
