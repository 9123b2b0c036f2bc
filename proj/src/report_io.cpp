// report io
