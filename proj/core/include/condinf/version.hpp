#ifndef CONDINF_VERSION_HPP
#define CONDINF_VERSION_HPP

#define CONDINF_VERSION_MAJOR 0
#define CONDINF_VERSION_MINOR 1
#define CONDINF_VERSION_PATCH 0
#define CONDINF_VERSION_STRING "0.1.0"

#endif
