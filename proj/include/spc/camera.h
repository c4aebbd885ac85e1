#pragma once

#include "spc/vec3.h"

#include <vector>

namespace spc {

// Pinhole camera. The rotation columns are the camera right, up and
// forward axes in world space.
struct CameraPose {
  Vec3 origin;
  Vec3 right{1, 0, 0};
  Vec3 up{0, 1, 0};
  Vec3 forward{0, 0, 1};
  double focal = 1.0;  // pixels
  int width = 0;
  int height = 0;
};

struct Ray {
  Vec3 origin;
  Vec3 dir;  // unit norm
};

using RaySet = std::vector<Ray>;

CameraPose
lookAt(Vec3 eye, Vec3 target, Vec3 worldUp, double focal, int width, int height);

Ray pixelRay(const CameraPose& cam, int px, int py);
RaySet cameraRays(const CameraPose& cam);

}  // namespace spc
