#include "afmm/kernel.hpp"

#include <string>

#include "afmm/error.hpp"

namespace afmm {

std::unique_ptr<Kernel> make_kernel(std::string_view name) {
  if (name == "laplace") return std::make_unique<LaplaceKernel>();
  if (name == "gaussian") return std::make_unique<GaussianKernel>();
  throw ParameterError("unknown kernel '" + std::string(name) + "'");
}

}  // namespace afmm
