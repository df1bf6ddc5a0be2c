#pragma once

#define ERGODENS_VERSION_MAJOR 0
#define ERGODENS_VERSION_MINOR 1
#define ERGODENS_VERSION_PATCH 0
#define ERGODENS_VERSION_STRING "0.1.0"
