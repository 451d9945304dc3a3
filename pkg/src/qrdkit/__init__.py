"""Numerical toolkit for one-shot quantum rate-distortion calculus.

Subpackages cover: dense operator algebra and distance measures (`states`,
`linalg`), a self-contained semidefinite-program solver (`sdp`), smooth/one-shot
entropic quantities (`entropies`), distortion observables and excess-distortion
projectors (`distortion`), converse and achievability bound evaluators
(`bounds`), exact finite-blocklength formulas for the isotropic qubit source
(`isotropic`), a Monte Carlo teleportation-protocol simulation (`protocol`),
and a command-line surface (`cli`).
"""

__version__ = "0.1.0"
