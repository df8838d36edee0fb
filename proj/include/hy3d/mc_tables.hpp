#pragma once

namespace hy3d {

// Classic marching-cubes lookup tables (Lorensen-Cline / Bourke numbering).
extern const int kMcEdgeTable[256];
extern const int kMcTriTable[256][16];

}  // namespace hy3d
