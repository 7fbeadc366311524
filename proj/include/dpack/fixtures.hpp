#pragma once

#include <string>
#include <vector>

#include "dpack/mechanism.hpp"

namespace dpack::fixtures {

/// Two 1 x 0.2 x 0.2 bars stacked in z, hinged about z at x = 1, limits
/// [0, pi]. Folding to pi halves the OBB.
Mechanism two_bar();

/// Two coincident bars [0,1] x [0,0.2]^2 hinged about z through the origin,
/// limits [0, pi/2]: they overlap at 0 and only touch at pi/2.
Mechanism corner_hinge();

/// Z-shaped chain: horizontal A, vertical B fixed to A, top bar C on a z hinge
/// at B's upper end (limits [0, pi]).
Mechanism zigzag3();

/// Bar, gear, gear, bar. A swings about the first gear's axle, the gears mesh
/// with ratio 1 across a small gap, B hinges on the second gear's rim.
Mechanism gear_chain4();

/// Two unit cubes on a z slider with limits [0, 1], B resting on A at 0.
Mechanism slider();

/// One unit cube, no joints.
Mechanism single_cube();

std::vector<std::string> names();
/// Throws InvalidInput for an unknown name.
Mechanism by_name(const std::string& name);

}  // namespace dpack::fixtures
