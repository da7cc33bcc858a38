#ifndef BRANCHMAX_VERSION_HPP
#define BRANCHMAX_VERSION_HPP

#define BRANCHMAX_VERSION "0.1.0"

#endif
