#ifndef PTOMO_PTOMO_HPP
#define PTOMO_PTOMO_HPP

#include "core.hpp"
#include "fft.hpp"
#include "field.hpp"
#include "geometry.hpp"
#include "io.hpp"
#include "norms.hpp"
#include "radon.hpp"
#include "reconstruct.hpp"
#include "tensor_inversion.hpp"
#include "transport.hpp"

#endif // PTOMO_PTOMO_HPP
