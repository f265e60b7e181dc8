// acceptance checks land here
