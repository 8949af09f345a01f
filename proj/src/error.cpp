#include "dlfusion/error.hpp"
