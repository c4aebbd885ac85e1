#pragma once

#include "spc/render.h"

#include <string>

namespace spc {

// 8-bit RGB export for inspection only; metrics never read these files.
void writePng(const Image& image, const std::string& path);

}  // namespace spc
