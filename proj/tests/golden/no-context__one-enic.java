// parse simple name to fully qualified name
// the fully qualified name of "Object" is "java.lang.Object"
// the fully qualified name of "br" is