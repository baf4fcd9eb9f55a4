#include "l3inv/errors.hpp"
