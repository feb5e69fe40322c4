"""IMU-driven teleoperation trainer.

Arm tracking from two simulated inertial sensors, link-length calibration,
a steady-hand ring-on-wire task with accuracy metrics, and pose streaming
for a browser console.
"""

__version__ = "0.1.0"

from .geom import RigidTransform, UnitQuaternion, Vector3

__all__ = ["RigidTransform", "UnitQuaternion", "Vector3", "__version__"]
