#include "spc/camera.h"

#include "spc/error.h"

namespace spc {

CameraPose
lookAt(Vec3 eye, Vec3 target, Vec3 worldUp, double focal, int width, int height)
{
  if (width < 1 || height < 1 || !(focal > 0))
    throwUsage("camera needs positive image size and focal length");
  CameraPose cam;
  cam.origin = eye;
  cam.forward = normalized(target - eye);
  cam.right = normalized(cross(cam.forward, worldUp));
  cam.up = cross(cam.right, cam.forward);
  cam.focal = focal;
  cam.width = width;
  cam.height = height;
  return cam;
}

Ray
pixelRay(const CameraPose& cam, int px, int py)
{
  double u = (px + 0.5 - 0.5 * cam.width) / cam.focal;
  double v = (0.5 * cam.height - (py + 0.5)) / cam.focal;
  Vec3 d = cam.forward + cam.right * u + cam.up * v;
  return {cam.origin, normalized(d)};
}

RaySet
cameraRays(const CameraPose& cam)
{
  RaySet rays;
  rays.reserve(size_t(cam.width) * size_t(cam.height));
  for (int y = 0; y < cam.height; y++)
    for (int x = 0; x < cam.width; x++)
      rays.push_back(pixelRay(cam, x, y));
  return rays;
}

}  // namespace spc
