#include "maxstable/quadrature.hpp"
