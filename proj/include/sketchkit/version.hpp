#pragma once

#define SKETCHKIT_VERSION "0.1.0"
