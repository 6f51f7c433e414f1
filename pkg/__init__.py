# EmitterCount root package
